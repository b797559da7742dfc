#include <stdlib.h>

struct vec {
    int *data;
    int len;
    int cap;
};

int vec_push(struct vec *v, int x) {
    if (v->len == v->cap) {
        v->cap = v->cap ? v->cap * 2 : 4;
        v->data = realloc(v->data, v->cap * sizeof(int));
        if (!v->data)
            return 0;
    }
    v->data[v->len] = x;
    v->len++;
    return 1;
}
