# SVIR Toolkit Application Package
