# Controllers package for absa-augment
