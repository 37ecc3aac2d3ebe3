# Models package for absa-augment
