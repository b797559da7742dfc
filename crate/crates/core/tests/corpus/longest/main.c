char *longest(char *s1, char *s2) {
    if (s1[0] > s2[0])
        return s1;
    return s2;
}
