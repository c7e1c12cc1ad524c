package demo.io;

import java.io.BufferedReader;
import java.io.FileReader;
import java.util.ArrayList;
import java.util.List;

public class LineReader {
    /** Reads all lines of a text file into a list. */
    public List<String> readLines(String path) throws IOException {
        List<String> lines = new ArrayList<>();
        BufferedReader reader = new BufferedReader(new FileReader(path));
        String line;
        while ((line = reader.readLine()) != null) {
            lines.add(line.trim());
        }
        reader.close();
        return lines;
    }

    /** Counts the non-empty lines in a file! */
    public int countLines(String path) throws IOException {
        int count = 0;
        try (BufferedReader reader = new BufferedReader(new FileReader(path))) {
            for (String line = reader.readLine(); line != null; line = reader.readLine()) {
                if (!line.isEmpty()) {
                    count++;
                }
            }
        }
        return count;
    }

    /** Prints each line of the reader to standard output. */
    public void dump(BufferedReader reader) throws IOException {
        String line = reader.readLine();
        while (line != null) {
            System.out.println(line);
            line = reader.readLine();
        }
    }

    /**
     * <p>Parses an integer from the first line.</p>
     */
    public int firstNumber(BufferedReader reader) throws IOException {
        return Integer.parseInt(reader.readLine().trim());
    }
}
