"""Files, LP export, bound tables, the aggregation sweep and the CLI."""
