int classify(int k) {
    switch (k) {
    case 0:
        return 10;
    case 1:
    case 2:
        return 20;
    default:
        return -1;
    }
}
