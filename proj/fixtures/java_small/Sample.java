public class Sample {
    /** Writes a greeting to the stream. */
    void greet(PrintStream out) {
        out.println("hello");
    }

    void undocumented(File f) {
        f.delete();
    }

    /** Opens the file for reading. */
    FileReader openFile(String name) throws IOException {
        return new FileReader(new File(name));
    }
}
