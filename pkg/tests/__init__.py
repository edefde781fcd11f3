# Tests package marker for helper modules.
