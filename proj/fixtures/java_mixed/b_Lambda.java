class Lambda {
    /** Sorts names by length. */
    void sort(List<String> names) {
        names.sort((a, b) -> a.length() - b.length());
    }
}
