package demo.net;

import java.net.URL;
import java.util.HashMap;
import java.util.Map;

public class HttpFetcher {
    private final Map<String, String> headers = new HashMap<>();
    private Connection connection;

    /** Opens a connection to the given address. */
    public void open(String address) throws Exception {
        URL url = new URL(address);
        this.connection = new Connection(url.openStream());
        connection.setTimeout(Math.max(1000, 500));
    }

    /** Adds a request header and returns this fetcher. */
    public HttpFetcher header(String key, String value) {
        headers.put(key.toLowerCase(), value);
        return this;
    }

    /** Fetches the body as text, or an empty string on failure. */
    public String fetch() {
        Response response = connection.execute();
        return response.isOk() ? response.body().text() : "";
    }

    /** Copies every header into the given map. */
    public void copyHeaders(Map<String, String> target) {
        for (String key : headers.keySet()) {
            target.put(key, headers.get(key));
        }
    }

    /** Closes the connection. */
    public void close() {
        if (connection != null) connection.close();
    }
}

class Response {
    Body body() { return new Body(); }
    boolean isOk() { return true; }
}

class Body {
    String text() { return ""; }
}
