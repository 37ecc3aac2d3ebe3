# Utils package for absa-augment
