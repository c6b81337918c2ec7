// Shortest round-trip decimal formatting for float64, matching the notation
// the bundle loader's writer counterpart uses: fixed point while the decimal
// exponent is in (-4, 16], otherwise scientific with a sign and at least two
// exponent digits, and a ".0" suffix on integral values.

/** Format a double the way Python's repr() does. */
export function formatDouble(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (x === Infinity) return "inf";
  if (x === -Infinity) return "-inf";
  if (x === 0) return Object.is(x, -0) ? "-0.0" : "0.0";

  const sign = x < 0 ? "-" : "";
  // toExponential() without an argument emits exactly the significand digits
  // needed to round-trip, which is the same digit string shortest-repr uses.
  const exp = Math.abs(x).toExponential();
  const m = /^(\d)(?:\.(\d+))?e([+-]\d+)$/.exec(exp);
  if (!m) throw new Error(`unexpected exponential form: ${exp}`);
  const digits = m[1] + (m[2] ?? "");
  const decpt = parseInt(m[3], 10) + 1; // digits[0] sits just left of 10^(decpt-1)

  if (decpt > -4 && decpt <= 16) {
    if (decpt <= 0) {
      return sign + "0." + "0".repeat(-decpt) + digits;
    }
    if (decpt >= digits.length) {
      return sign + digits + "0".repeat(decpt - digits.length) + ".0";
    }
    return sign + digits.slice(0, decpt) + "." + digits.slice(decpt);
  }

  const e = decpt - 1;
  const esign = e < 0 ? "-" : "+";
  const eabs = Math.abs(e).toString().padStart(2, "0");
  const mantissa = digits.length > 1 ? digits[0] + "." + digits.slice(1) : digits[0];
  return sign + mantissa + "e" + esign + eabs;
}
