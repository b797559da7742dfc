#include <stdlib.h>
#include <string.h>
#include "string_table.h"

void string_table_init(struct string_table_t *t) {
    t->arr = NULL;
    t->n = 0;
    t->capacity = 0;
}

static void string_table_reserve(struct string_table_t *t, size_t extra) {
    size_t need = t->n + extra;
    if (need <= t->capacity)
        return;
    t->capacity = need * 2;
    t->arr = realloc(t->arr, t->capacity);
}

size_t string_table_store(struct string_table_t *t, const char *str) {
    size_t len = strlen(str) + 1;
    size_t start = t->n;
    string_table_reserve(t, len);
    memcpy(t->arr + start, str, len);
    t->n += len;
    return start;
}

const char *string_table_get(struct string_table_t *t, size_t offset) {
    return t->arr + offset;
}

void string_table_free(struct string_table_t *t) {
    free(t->arr);
}
