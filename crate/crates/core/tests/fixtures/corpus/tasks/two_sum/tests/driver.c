/* Reads "n target" then n integers; prints the two indices in ascending order. */
#include <stdio.h>
#include <stdlib.h>

int *twoSum(int *nums, int numsSize, int target, int *returnSize);

int main(void)
{
    int n, target, size = 0;
    if (scanf("%d %d", &n, &target) != 2 || n < 0)
        return 1;
    int *nums = malloc((n ? n : 1) * sizeof *nums);
    for (int i = 0; i < n; i++)
        if (scanf("%d", &nums[i]) != 1)
            return 1;
    int *res = twoSum(nums, n, target, &size);
    if (res == NULL || size != 2) {
        printf("none\n");
    } else {
        int a = res[0] < res[1] ? res[0] : res[1];
        int b = res[0] < res[1] ? res[1] : res[0];
        printf("%d %d\n", a, b);
    }
    free(res);
    free(nums);
    return 0;
}
