unsigned long hashFunction(const char *key) {
    unsigned long hash = 0;
    while (*key) {
        hash = (hash << 5) + *key++;
    }
    return hash;
}
