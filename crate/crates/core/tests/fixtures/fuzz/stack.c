#include <stdlib.h>
#include <unistd.h>

#include "stack.h"

struct Stack {
    int *items;
    int size;
    int cap;
};

Stack *stack_create(void)
{
    Stack *s = calloc(1, sizeof *s);
    return s;
}

void stack_push(Stack *s, int value)
{
#ifdef PLANT_CRASH
    if (value == 666)
        *(volatile int *)(size_t)value = 1;
#endif
#ifdef PLANT_HANG
    if (value == 777)
        sleep(10);
#endif
    if (s->size == s->cap) {
        int cap = s->cap ? s->cap * 2 : 8;
        int *items = realloc(s->items, cap * sizeof *items);
        if (items == NULL)
            return;
        s->items = items;
        s->cap = cap;
    }
    s->items[s->size++] = value;
}

int stack_pop(Stack *s)
{
    if (s->size == 0)
        return -1;
    return s->items[--s->size];
}

int stack_peek(const Stack *s)
{
    return s->size ? s->items[s->size - 1] : -1;
}

int stack_size(const Stack *s)
{
    return s->size;
}

void stack_destroy(Stack *s)
{
    free(s->items);
    free(s);
}
