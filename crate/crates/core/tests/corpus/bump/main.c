void bump(int *c) {
    (*c)++;
}
