class Good {
    /** Builds a string. */
    String build() {
        StringBuilder sb = new StringBuilder();
        sb.append("x");
        return sb.toString();
    }
}
