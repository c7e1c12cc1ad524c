package demo.util;

import java.util.concurrent.ConcurrentHashMap;

public class Cache<K, V> {
    private final ConcurrentHashMap<K, Entry<V>> map = new ConcurrentHashMap<>();
    private static final Logger LOG = Logger.getLogger("cache");

    /** Stores a value with the current time stamp. */
    public void put(K key, V value) {
        long now = System.currentTimeMillis();
        map.put(key, new Entry<V>(value, now));
        LOG.fine("stored " + key);
    }

    /** Looks up a value and drops it when it has expired. */
    public V get(K key) {
        Entry<V> e = map.get(key);
        if (e == null) {
            return null;
        }
        if (e.isExpired(java.time.Instant.now().toEpochMilli())) {
            map.remove(key);
            return null;
        }
        return e.value;
    }

    /** Removes all expired entries. */
    public int purge() {
        int removed = 0;
        for (K key : map.keySet()) {
            Entry<V> e = map.get(key);
            if (e.isExpired(System.currentTimeMillis())) {
                map.remove(key);
                removed++;
            }
        }
        LOG.info(String.format("purged %d", removed));
        return removed;
    }

    /** Holds a value and its creation time. */
    static final class Entry<T> {
        final T value;
        final long created;

        Entry(T value, long created) {
            this.value = value;
            this.created = created;
        }

        /** Tells whether this entry is older than one minute. */
        boolean isExpired(long now) {
            return now - created > 60_000L;
        }
    }
}
