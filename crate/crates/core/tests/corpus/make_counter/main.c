#include <stdlib.h>

int *make_counter(void) {
    int *c = malloc(sizeof(int));
    if (c)
        *c = 0;
    return c;
}
