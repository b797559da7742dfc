#include <stdlib.h>

void release(int *p) {
    free(p);
}
