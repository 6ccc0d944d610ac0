"""Motor numérico: expresiones, integrador, Riccati y criterios."""
