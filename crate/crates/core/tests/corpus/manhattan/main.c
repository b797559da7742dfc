#include <stdlib.h>

struct point {
    int x;
    int y;
};

int manhattan(const struct point *a, const struct point *b) {
    return abs(a->x - b->x) + abs(a->y - b->y);
}
