#ifndef STRING_TABLE_H
#define STRING_TABLE_H

#include <stddef.h>

struct string_table_t {
    char *arr;
    size_t n;
    size_t capacity;
};

void string_table_init(struct string_table_t *t);
size_t string_table_store(struct string_table_t *t, const char *str);
const char *string_table_get(struct string_table_t *t, size_t offset);
void string_table_free(struct string_table_t *t);

#endif
