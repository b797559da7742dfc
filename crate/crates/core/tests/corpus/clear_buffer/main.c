#include <string.h>

void clear(char *buf, int n) {
    memset(buf, 0, n);
}
