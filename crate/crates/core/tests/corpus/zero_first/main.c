void zero_first(void *p) {
    char *bytes = (char *)p;
    bytes[0] = 0;
}
