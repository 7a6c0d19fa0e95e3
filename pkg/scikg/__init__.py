"""
Anotación de contribuciones científicas en LaTeX, con incrustación XMP en PDF
y subida a un grafo de conocimiento.
"""

__version__ = "1.0.0"
