package projA;

/** A widget of configurable size. */
public class Widget {

    private int size;

    /** Field doc, not a method. */
    private String name;

    /**
     * Creates a widget scaled by the given factor.
     * Extra detail sentence that must not survive truncation.
     *
     * @param factor the scale factor
     */
    public Widget scaled(double factor) {
        return new Widget(size);
    }

    /**
     * Computes the {@code area} of this widget in <b>pixels</b>.
     */
    protected long computeArea(int width, int height) {
        long area = width * height;
        return area;
    }

    public void undocumented() { }

    /** Constructor docs are not method records. */
    public Widget(int size) {
        this.size = size;
    }

    static class Inner {
        int counter;

        /**
         * Resets the inner counter
         * without touching the outer state
         */
        void resetCounter() {
            counter = 0;
        }
    }
}
