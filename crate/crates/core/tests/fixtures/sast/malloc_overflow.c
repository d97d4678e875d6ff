#include <stdlib.h>
int *make(int n) {
    int *a = malloc(n * sizeof(int));
    return a;
}
