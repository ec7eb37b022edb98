//! Per-language test-runner shims. A shim loads the patch file, resolves the
//! entry point, runs every testcase in corpus order and reports on stdout in
//! the result-line protocol:
//!
//! `START <i>` before test i; `OK <i>` when the shim's own naive comparison
//! passes (a hint only); `VAL <i> <literal>` the actual value in canonical
//! literal syntax; `ERR <i> <message>` on an uncaught error (i = 0 for
//! load/compile failures); final `DONE`. The host applies the authoritative
//! tolerance-aware comparison to the VAL lines.

use crate::domain::{BugInstance, Language};

const PYTHON_SHIM: &str = r##"import copy
import io
import json
import sys

ENTRY_POINT = "__ENTRY_POINT__"
PATCH_FILE = "patch.py"
TESTS_FILE = "tests.txt"


def _one_line(text):
    return " ".join(str(text).split()) or "<no message>"


def _render(value):
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value or value == float("inf") or value == float("-inf"):
            raise ValueError("non-finite float result")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_render(item) for item in value) + "]"
    raise ValueError("unsupported result type: " + type(value).__name__)


def _listify(value):
    if isinstance(value, (list, tuple)):
        return [_listify(item) for item in value]
    return value


def _split_arrow(line):
    depth = 0
    in_string = False
    escaped = False
    for index, ch in enumerate(line):
        if escaped:
            escaped = False
            continue
        if in_string:
            if ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "-" and depth == 0 and line[index : index + 2] == "->":
            return line[:index], line[index + 2 :]
    raise ValueError("missing -> separator: " + line)


def _load_tests():
    tests = []
    with open(TESTS_FILE, "r", encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            left, right = _split_arrow(line)
            left = left.strip()
            inputs = json.loads("[" + left + "]") if left else []
            tests.append((inputs, json.loads(right)))
    return tests


def main():
    emit_stream = sys.stdout
    # the patch's own prints must not corrupt the protocol stream
    sys.stdout = io.StringIO()

    def emit(line):
        emit_stream.write(line + "\n")
        emit_stream.flush()

    tests = _load_tests()
    with open(PATCH_FILE, "r", encoding="utf-8") as handle:
        source = handle.read()
    namespace = {}
    try:
        code = compile(source, PATCH_FILE, "exec")
        exec(code, namespace)
    except BaseException as exc:
        emit("ERR 0 " + _one_line("%s: %s" % (type(exc).__name__, exc)))
        return
    func = namespace.get(ENTRY_POINT)
    if not callable(func):
        emit("ERR 0 " + _one_line("entry point %s is not defined" % ENTRY_POINT))
        return
    for index, (inputs, expected) in enumerate(tests, start=1):
        emit("START %d" % index)
        try:
            actual = func(*copy.deepcopy(inputs))
            rendered = _render(actual)
        except BaseException as exc:
            emit("ERR %d %s" % (index, _one_line("%s: %s" % (type(exc).__name__, exc))))
            return
        if _listify(actual) == expected:
            emit("OK %d" % index)
        emit("VAL %d %s" % (index, rendered))
    emit("DONE")


if __name__ == "__main__":
    main()
"##;

const JAVA_SHIM: &str = r##"import java.io.FileDescriptor;
import java.io.FileOutputStream;
import java.io.OutputStream;
import java.io.PrintStream;
import java.lang.reflect.InvocationTargetException;
import java.lang.reflect.Method;
import java.lang.reflect.Modifier;
import java.lang.reflect.ParameterizedType;
import java.lang.reflect.Type;
import java.nio.charset.StandardCharsets;
import java.nio.file.Files;
import java.nio.file.Paths;
import java.util.ArrayList;
import java.util.List;

public class Runner {
    static final String ENTRY_POINT = "__ENTRY_POINT__";
    static final String TESTS_FILE = "tests.txt";
    static PrintStream protocol;

    public static void main(String[] args) throws Exception {
        protocol = new PrintStream(new FileOutputStream(FileDescriptor.out), true, "UTF-8");
        // the patch's own prints must not corrupt the protocol stream
        System.setOut(new PrintStream(new OutputStream() { public void write(int b) {} }));

        String className = args.length > 0 ? args[0] : "Patch";
        List<Object[]> tests = loadTests();
        Method method;
        try {
            Class<?> cls = Class.forName(className);
            method = findMethod(cls);
        } catch (Throwable t) {
            err(0, describe(t));
            return;
        }
        if (method == null) {
            err(0, "entry point " + ENTRY_POINT + " is not defined");
            return;
        }
        method.setAccessible(true);

        int index = 0;
        for (Object[] test : tests) {
            index++;
            protocol.println("START " + index);
            Object actual;
            String rendered;
            try {
                Object[] argv = adaptArguments((List<?>) test[0], method);
                actual = method.invoke(null, argv);
                rendered = render(actual);
            } catch (InvocationTargetException ite) {
                Throwable cause = ite.getCause() == null ? ite : ite.getCause();
                err(index, describe(cause));
                return;
            } catch (Throwable t) {
                err(index, describe(t));
                return;
            }
            if (looseEquals(actual, test[1])) {
                protocol.println("OK " + index);
            }
            protocol.println("VAL " + index + " " + rendered);
        }
        protocol.println("DONE");
    }

    static Method findMethod(Class<?> cls) {
        Method fallback = null;
        for (Method m : cls.getDeclaredMethods()) {
            if (!m.getName().equals(ENTRY_POINT)) {
                continue;
            }
            if (Modifier.isStatic(m.getModifiers())) {
                return m;
            }
            fallback = m;
        }
        return fallback;
    }

    static void err(int index, String message) {
        protocol.println("ERR " + index + " " + oneLine(message));
    }

    static String oneLine(String text) {
        if (text == null || text.trim().isEmpty()) {
            return "<no message>";
        }
        return text.trim().replaceAll("\\s+", " ");
    }

    static String describe(Throwable t) {
        String message = t.getMessage();
        return t.getClass().getSimpleName() + (message == null ? "" : ": " + message);
    }

    static List<Object[]> loadTests() throws Exception {
        List<Object[]> tests = new ArrayList<Object[]>();
        for (String raw : Files.readAllLines(Paths.get(TESTS_FILE), StandardCharsets.UTF_8)) {
            String line = raw.trim();
            if (line.isEmpty() || line.startsWith("#")) {
                continue;
            }
            int arrow = findArrow(line);
            String left = line.substring(0, arrow).trim();
            String right = line.substring(arrow + 2).trim();
            Object inputs = new Parser("[" + left + "]").parse();
            Object expected = new Parser(right).parse();
            tests.add(new Object[] { inputs, expected });
        }
        return tests;
    }

    static int findArrow(String line) {
        int depth = 0;
        boolean inString = false;
        boolean escaped = false;
        for (int i = 0; i < line.length(); i++) {
            char ch = line.charAt(i);
            if (escaped) {
                escaped = false;
                continue;
            }
            if (inString) {
                if (ch == '\\') {
                    escaped = true;
                } else if (ch == '"') {
                    inString = false;
                }
                continue;
            }
            if (ch == '"') {
                inString = true;
            } else if (ch == '[') {
                depth++;
            } else if (ch == ']') {
                depth--;
            } else if (ch == '-' && depth == 0 && i + 1 < line.length() && line.charAt(i + 1) == '>') {
                return i;
            }
        }
        throw new RuntimeException("missing -> separator: " + line);
    }

    static Object[] adaptArguments(List<?> inputs, Method method) {
        Class<?>[] params = method.getParameterTypes();
        Type[] generics = method.getGenericParameterTypes();
        if (params.length != inputs.size()) {
            throw new RuntimeException(
                "entry point takes " + params.length + " argument(s), testcase has " + inputs.size());
        }
        Object[] argv = new Object[params.length];
        for (int i = 0; i < params.length; i++) {
            argv[i] = adapt(inputs.get(i), generics[i]);
        }
        return argv;
    }

    static Object adapt(Object value, Type type) {
        if (type instanceof ParameterizedType) {
            ParameterizedType p = (ParameterizedType) type;
            Type raw = p.getRawType();
            if (raw instanceof Class && List.class.isAssignableFrom((Class<?>) raw)) {
                Type element = p.getActualTypeArguments()[0];
                ArrayList<Object> out = new ArrayList<Object>();
                for (Object item : (List<?>) value) {
                    out.add(adapt(item, element));
                }
                return out;
            }
            return adapt(value, raw);
        }
        if (!(type instanceof Class)) {
            return adaptDefault(value);
        }
        Class<?> cls = (Class<?>) type;
        if (cls == int.class || cls == Integer.class) {
            return Integer.valueOf(((Number) value).intValue());
        }
        if (cls == long.class || cls == Long.class) {
            return Long.valueOf(((Number) value).longValue());
        }
        if (cls == double.class || cls == Double.class) {
            return Double.valueOf(((Number) value).doubleValue());
        }
        if (cls == float.class || cls == Float.class) {
            return Float.valueOf(((Number) value).floatValue());
        }
        if (cls == boolean.class || cls == Boolean.class) {
            return value;
        }
        if (cls == String.class) {
            return (String) value;
        }
        if (cls == char.class || cls == Character.class) {
            return Character.valueOf(((String) value).charAt(0));
        }
        if (cls.isArray()) {
            List<?> items = (List<?>) value;
            Object array = java.lang.reflect.Array.newInstance(cls.getComponentType(), items.size());
            for (int i = 0; i < items.size(); i++) {
                java.lang.reflect.Array.set(array, i, adapt(items.get(i), cls.getComponentType()));
            }
            return array;
        }
        return adaptDefault(value);
    }

    // Untyped targets get int-centric defaults: whole numbers as Integer when
    // they fit, nested lists as ArrayList.
    static Object adaptDefault(Object value) {
        if (value instanceof Long) {
            long v = (Long) value;
            if (v >= Integer.MIN_VALUE && v <= Integer.MAX_VALUE) {
                return Integer.valueOf((int) v);
            }
            return value;
        }
        if (value instanceof List) {
            ArrayList<Object> out = new ArrayList<Object>();
            for (Object item : (List<?>) value) {
                out.add(adaptDefault(item));
            }
            return out;
        }
        return value;
    }

    static String render(Object value) {
        if (value == null) {
            return "null";
        }
        if (value instanceof Boolean) {
            return ((Boolean) value) ? "true" : "false";
        }
        if (value instanceof Integer || value instanceof Long || value instanceof Short
                || value instanceof Byte) {
            return value.toString();
        }
        if (value instanceof Double || value instanceof Float) {
            double d = ((Number) value).doubleValue();
            if (Double.isNaN(d) || Double.isInfinite(d)) {
                throw new RuntimeException("non-finite float result");
            }
            return Double.toString(d);
        }
        if (value instanceof Character) {
            return quote(value.toString());
        }
        if (value instanceof String) {
            return quote((String) value);
        }
        if (value.getClass().isArray()) {
            int length = java.lang.reflect.Array.getLength(value);
            StringBuilder sb = new StringBuilder("[");
            for (int i = 0; i < length; i++) {
                if (i > 0) {
                    sb.append(", ");
                }
                sb.append(render(java.lang.reflect.Array.get(value, i)));
            }
            return sb.append("]").toString();
        }
        if (value instanceof Iterable) {
            StringBuilder sb = new StringBuilder("[");
            boolean first = true;
            for (Object item : (Iterable<?>) value) {
                if (!first) {
                    sb.append(", ");
                }
                first = false;
                sb.append(render(item));
            }
            return sb.append("]").toString();
        }
        throw new RuntimeException("unsupported result type: " + value.getClass().getName());
    }

    static String quote(String text) {
        StringBuilder sb = new StringBuilder("\"");
        for (int i = 0; i < text.length(); i++) {
            char ch = text.charAt(i);
            switch (ch) {
                case '"': sb.append("\\\""); break;
                case '\\': sb.append("\\\\"); break;
                case '\n': sb.append("\\n"); break;
                case '\r': sb.append("\\r"); break;
                case '\t': sb.append("\\t"); break;
                default:
                    if (ch < 0x20) {
                        sb.append(String.format("\\u%04x", (int) ch));
                    } else {
                        sb.append(ch);
                    }
            }
        }
        return sb.append("\"").toString();
    }

    static boolean looseEquals(Object a, Object b) {
        Object left = normalize(a);
        Object right = normalize(b);
        if (left == null || right == null) {
            return left == right;
        }
        if (left instanceof Number && right instanceof Number) {
            return ((Number) left).doubleValue() == ((Number) right).doubleValue();
        }
        if (left instanceof List && right instanceof List) {
            List<?> xs = (List<?>) left;
            List<?> ys = (List<?>) right;
            if (xs.size() != ys.size()) {
                return false;
            }
            for (int i = 0; i < xs.size(); i++) {
                if (!looseEquals(xs.get(i), ys.get(i))) {
                    return false;
                }
            }
            return true;
        }
        return left.equals(right);
    }

    static Object normalize(Object value) {
        if (value != null && value.getClass().isArray()) {
            int length = java.lang.reflect.Array.getLength(value);
            ArrayList<Object> out = new ArrayList<Object>(length);
            for (int i = 0; i < length; i++) {
                out.add(java.lang.reflect.Array.get(value, i));
            }
            return out;
        }
        if (value instanceof Iterable && !(value instanceof List)) {
            ArrayList<Object> out = new ArrayList<Object>();
            for (Object item : (Iterable<?>) value) {
                out.add(item);
            }
            return out;
        }
        return value;
    }

    static final class Parser {
        private final String text;
        private int pos;

        Parser(String text) {
            this.text = text;
        }

        Object parse() {
            skipWhitespace();
            Object value = parseValue();
            skipWhitespace();
            if (pos != text.length()) {
                throw new RuntimeException("trailing characters in literal: " + text);
            }
            return value;
        }

        private Object parseValue() {
            char ch = peek();
            if (ch == '[') {
                return parseList();
            }
            if (ch == '"') {
                return parseString();
            }
            if (text.startsWith("true", pos)) {
                pos += 4;
                return Boolean.TRUE;
            }
            if (text.startsWith("false", pos)) {
                pos += 5;
                return Boolean.FALSE;
            }
            if (text.startsWith("null", pos)) {
                pos += 4;
                return null;
            }
            return parseNumber();
        }

        private List<Object> parseList() {
            expect('[');
            ArrayList<Object> items = new ArrayList<Object>();
            skipWhitespace();
            if (peek() == ']') {
                pos++;
                return items;
            }
            while (true) {
                skipWhitespace();
                items.add(parseValue());
                skipWhitespace();
                char ch = peek();
                if (ch == ',') {
                    pos++;
                } else if (ch == ']') {
                    pos++;
                    return items;
                } else {
                    throw new RuntimeException("expected , or ] in list");
                }
            }
        }

        private String parseString() {
            expect('"');
            StringBuilder sb = new StringBuilder();
            while (true) {
                if (pos >= text.length()) {
                    throw new RuntimeException("unterminated string literal");
                }
                char ch = text.charAt(pos++);
                if (ch == '"') {
                    return sb.toString();
                }
                if (ch != '\\') {
                    sb.append(ch);
                    continue;
                }
                char esc = text.charAt(pos++);
                switch (esc) {
                    case '"': sb.append('"'); break;
                    case '\\': sb.append('\\'); break;
                    case '/': sb.append('/'); break;
                    case 'n': sb.append('\n'); break;
                    case 'r': sb.append('\r'); break;
                    case 't': sb.append('\t'); break;
                    case 'b': sb.append('\b'); break;
                    case 'f': sb.append('\f'); break;
                    case 'u':
                        sb.append((char) Integer.parseInt(text.substring(pos, pos + 4), 16));
                        pos += 4;
                        break;
                    default:
                        throw new RuntimeException("bad escape \\" + esc);
                }
            }
        }

        private Object parseNumber() {
            int start = pos;
            boolean floating = false;
            while (pos < text.length()) {
                char ch = text.charAt(pos);
                if (ch == '.' || ch == 'e' || ch == 'E') {
                    floating = true;
                    pos++;
                } else if (ch == '-' || ch == '+' || Character.isDigit(ch)) {
                    pos++;
                } else {
                    break;
                }
            }
            String token = text.substring(start, pos);
            if (token.isEmpty()) {
                throw new RuntimeException("bad literal at: " + text.substring(start));
            }
            if (floating) {
                return Double.valueOf(Double.parseDouble(token));
            }
            return Long.valueOf(Long.parseLong(token));
        }

        private char peek() {
            if (pos >= text.length()) {
                throw new RuntimeException("unexpected end of literal");
            }
            return text.charAt(pos);
        }

        private void expect(char ch) {
            if (peek() != ch) {
                throw new RuntimeException("expected " + ch);
            }
            pos++;
        }

        private void skipWhitespace() {
            while (pos < text.length() && Character.isWhitespace(text.charAt(pos))) {
                pos++;
            }
        }
    }
}
"##;

/// Emit the self-contained runner source for the bug's language, with the
/// entry point baked in.
pub fn generate_shim(bug: &BugInstance) -> String {
    let template = match bug.language {
        Language::Python => PYTHON_SHIM,
        Language::Java => JAVA_SHIM,
    };
    template.replace("__ENTRY_POINT__", &bug.entry_point)
}

/// Name of the first class declared in a Java source, used to pick the patch
/// file name javac expects.
pub fn java_class_name(source: &str) -> Option<String> {
    let re = regex::Regex::new(r"(?m)^\s*(?:public\s+)?(?:final\s+)?(?:abstract\s+)?class\s+([A-Za-z_][A-Za-z0-9_]*)")
        .expect("static regex");
    re.captures(source)
        .map(|caps| caps.get(1).expect("class name group").as_str().to_string())
}

/// Java patches are compiled into a flat default-package workspace; package
/// declarations would break Class.forName on the plain name.
pub fn strip_package_declaration(source: &str) -> String {
    source
        .lines()
        .filter(|line| !line.trim_start().starts_with("package "))
        .collect::<Vec<_>>()
        .join("\n")
}
