#include "opmin/rational.hpp"

#include <ostream>

namespace opmin {

Rat Rat::parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Rat::parse: empty string");
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("Rat::parse: bad rational '" + s + "'");
    if (q.get_den() == 0) throw std::invalid_argument("Rat::parse: zero denominator in '" + s + "'");
    return Rat(q);
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

}  // namespace opmin
