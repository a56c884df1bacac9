# Testimation test package
