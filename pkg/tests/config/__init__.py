# Config tests package
