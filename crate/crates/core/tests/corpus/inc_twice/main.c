struct counter {
    int n;
};

static void inc(struct counter *c) {
    c->n++;
}

void inc_twice(struct counter *k) {
    inc(k);
    inc(k);
}
