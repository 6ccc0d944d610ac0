"""Capa de datos: escenarios y repositorios de reportes en archivos."""
