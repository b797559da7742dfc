struct holder {
    int *slot;
};

void hold(struct holder *h, int *v) {
    h->slot = v;
}
