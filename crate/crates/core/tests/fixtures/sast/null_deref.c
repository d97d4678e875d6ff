#include <stddef.h>
struct node { int val; };
int get(struct node *n) {
    if (n == NULL) {
        return n->val;
    }
    return 0;
}
