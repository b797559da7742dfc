#include <stdlib.h>

struct box {
    int *item;
};

void box_put(struct box *b, int *item) {
    b->item = item;
}

void box_clear(struct box *b) {
    free(b->item);
    b->item = NULL;
}
