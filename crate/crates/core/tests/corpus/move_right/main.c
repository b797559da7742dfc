struct point {
    int x;
    int y;
};

void move_right(struct point *p) {
    p->x = p->x + 1;
}
