#include <stdio.h>
#include "string_table.h"

int main(void) {
    struct string_table_t table;
    string_table_init(&table);
    size_t a = string_table_store(&table, "libc.so.6");
    size_t b = string_table_store(&table, "libm.so.6");
    printf("%s %s\n", string_table_get(&table, a), string_table_get(&table, b));
    string_table_free(&table);
    return 0;
}
