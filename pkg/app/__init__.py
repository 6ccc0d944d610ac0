# fdelab - Laboratorio numérico de ecuaciones funcional-diferenciales forzadas
