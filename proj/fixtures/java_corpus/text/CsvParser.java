package demo.text;

import java.util.*;

public class CsvParser {
    private char separator = ',';
    private StringBuilder scratch;

    /**
     * Splits a line into trimmed fields.
     */
    public List<String> split(String line) {
        String[] parts = line.split(String.valueOf(separator));
        List<String> fields = new ArrayList<String>(parts.length);
        for (int i = 0; i < parts.length; i++) {
            fields.add(parts[i].trim());
        }
        return fields;
    }

    /** Returns the number of separators. */
    public int count(String line) {
        int n = 0;
        for (char c : line.toCharArray()) {
            n += c == separator ? 1 : 0;
        }
        return n;
    }

    /** Joins fields with the separator. */
    public String join(List<String> fields) {
        var sb = new StringBuilder();
        int i = 0;
        do {
            if (i > 0) sb.append(separator);
            sb.append(fields.get(i));
            i++;
        } while (i < fields.size());
        return sb.toString();
    }

    /** Tells whether the separator is a comma. */
    public boolean isComma() {
        return separator == ',';
    }

    /**
     * @return the scratch buffer
     */
    public StringBuilder buffer() {
        return scratch.append("");
    }

    /** Quotes a field when it contains the separator (RFC 4180). */
    public String quote(String field) {
        return field.indexOf(separator) >= 0 ? "\"" + field.replace("\"", "\"\"") + "\"" : field;
    }
}
