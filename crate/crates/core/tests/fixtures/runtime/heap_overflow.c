#include <stdio.h>
#include <stdlib.h>

int main(void)
{
    int n = 0;
    if (scanf("%d", &n) != 1 || n <= 0)
        return 1;
    int *a = malloc(n * sizeof(int));
    for (int i = 0; i < n; i++)
        a[i] = i;
    int sum = 0;
    for (int i = 0; i <= n; i++)
        sum += a[i];
    printf("%d\n", sum);
    free(a);
    return 0;
}
