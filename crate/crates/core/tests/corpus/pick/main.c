static int fallback_value = 0;

int *pick(int *preferred) {
    if (preferred)
        return preferred;
    return &fallback_value;
}
