# Schema tests
