# Tests package for absa-augment
