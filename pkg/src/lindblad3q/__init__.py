"""Third quantization of quadratic Lindbladians and exact dissipative Kerr dynamics."""
