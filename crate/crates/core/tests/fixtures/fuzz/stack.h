#ifndef STACK_H
#define STACK_H

typedef struct Stack Stack;

Stack *stack_create(void);
void stack_push(Stack *s, int value);
int stack_pop(Stack *s);
int stack_peek(const Stack *s);
int stack_size(const Stack *s);
void stack_destroy(Stack *s);

#endif
