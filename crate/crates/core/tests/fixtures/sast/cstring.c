#include <string.h>
void f(void) {
    char dst[4];
    strcpy(dst, "too long string");
}
