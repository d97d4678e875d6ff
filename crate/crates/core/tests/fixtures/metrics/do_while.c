int count_digits(int n) {
    int c = 0;
    do {
        c++;
        n /= 10;
    } while (n != 0);
    return c;
}
