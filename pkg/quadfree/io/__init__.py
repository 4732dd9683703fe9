"""Loading and saving equations, certificates and bin packing documents."""
