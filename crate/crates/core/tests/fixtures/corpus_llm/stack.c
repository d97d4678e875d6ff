#include <stdlib.h>
#include "stack.h"

#define INITIAL_CAPACITY 4

struct Stack {
    int *data;
    int top;
    int capacity;
};

Stack *stack_create(void) {
    Stack *s = (Stack *)malloc(sizeof(Stack));
    s->data = (int *)malloc(INITIAL_CAPACITY * sizeof(int));
    s->top = 0;
    s->capacity = INITIAL_CAPACITY;
    return s;
}

void stack_push(Stack *s, int value) {
    if (s->top == s->capacity) {
        s->capacity *= 2;
        s->data = (int *)realloc(s->data, s->capacity * sizeof(int));
    }
    s->data[s->top++] = value;
}

int stack_pop(Stack *s) {
    return s->data[--s->top];
}

int stack_peek(const Stack *s) {
    if (s->top == 0) {
        return -1;
    }
    return s->data[s->top - 1];
}

int stack_size(const Stack *s) {
    return s->top;
}

void stack_destroy(Stack *s) {
    free(s->data);
    free(s);
}
