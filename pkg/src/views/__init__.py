# Views package for absa-augment
