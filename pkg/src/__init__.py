# Random Linear Coding Analyzer

