/* Crashes on any input, so the fuzzer refuses the seed. */
#include <stdlib.h>

#include "stack.h"

Stack *stack_create(void)
{
    abort();
}

void stack_push(Stack *s, int value) { (void)s; (void)value; }
int stack_pop(Stack *s) { (void)s; return 0; }
int stack_peek(const Stack *s) { (void)s; return 0; }
int stack_size(const Stack *s) { (void)s; return 0; }
void stack_destroy(Stack *s) { (void)s; }
