package demo.io;

import java.io.*;
import java.util.List;

/** Utility for copying files. */
public class FileCopier {
    private final byte[] buffer = new byte[4096];
    private Logger log;

    /**
     * Copies all bytes from one file to another.
     * @param src the source
     * @param dst the target
     */
    public void copy(File src, File dst) throws IOException {
        FileInputStream in = new FileInputStream(src);
        FileOutputStream out = new FileOutputStream(dst);
        int n;
        while ((n = in.read(buffer)) > 0) {
            out.write(buffer, 0, n);
        }
        in.close();
        out.close();
    }

    /** Returns <code>true</code> if the file exists and is readable. */
    public boolean canCopy(String path) {
        File f = new File(path);
        return f.exists() && f.canRead();
    }

    /**
     * Deletes the target when {@code force} is set. Otherwise logs a warning.
     */
    public void remove(File target, boolean force) {
        if (force) {
            target.delete();
        } else {
            log.warn("not deleting " + target.getName());
        }
    }

    // no javadoc, so no pair
    private void helper(File f) {
        f.setReadOnly();
    }

    /** Creates the parent directory of the given file if it is missing. */
    public static void ensureParent(File file) {
        File parent = file.getParentFile();
        if (parent != null && !parent.exists()) {
            parent.mkdirs();
        }
    }
}
