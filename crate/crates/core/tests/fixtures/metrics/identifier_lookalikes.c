int iffy = 1;
int format = 2;
int whilst = 3;
int casement = 4;
int gotoh = 5;
int total(void) { return iffy + format + whilst + casement + gotoh; }
