const char *level_name(int level) {
    if (level > 2)
        return "high";
    return "low";
}
