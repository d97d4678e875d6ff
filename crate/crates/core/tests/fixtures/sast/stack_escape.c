int *f(void) {
    int local = 3;
    return &local;
}
