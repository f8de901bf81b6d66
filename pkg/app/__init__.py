# Eliminax Application Package 
