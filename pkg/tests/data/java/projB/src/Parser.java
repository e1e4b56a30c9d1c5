package projB;

/** Tokenizer facade. */
public class Parser {
    /** Parses the input into a tree. */
    public Tree parse(String input) {
        Lexer lx = new Lexer(input);
        return build(lx);
    }

    /** Builds a tree from lexer output. */
    private Tree build(Lexer lx) {
        validate(lx);
        return new Tree(lx);
    }

    /** Validates lexer state. // braces in strings: "{" */
    private void validate(Lexer lx) {
        check(lx, "{");
        check(lx, "}");
    }
}
