"""Studies, complexity model, file formats and the command line."""
