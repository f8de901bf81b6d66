# Eliminax Services Package 
