#include <stdlib.h>

int work(int n) {
    int *buf = malloc(n * sizeof(int));
    if (buf == NULL)
        goto fail;
    for (int i = 0; i < n; i++)
        buf[i] = i;
    free(buf);
    return 0;
fail:
    return -1;
}
