struct color {
    const char *name;
    int rgb;
};

void color_set_red(struct color *c) {
    c->name = "red";
    c->rgb = 0xff0000;
}

void color_set_blue(struct color *c) {
    c->name = "blue";
    c->rgb = 0xff;
}
