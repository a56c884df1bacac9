# Utils test package
