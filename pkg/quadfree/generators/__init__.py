"""Certificate search, bin packing and the ribbon tiling construction."""
