// if this were code, for and while would count
/* case goto && || ? */
int identity(int v) {
    /* if (v) */
    return v; // while(1)
}
