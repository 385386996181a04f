#include "swarm/error.hpp"

namespace swarm {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::invalid_argument: return "invalid-argument";
        case Errc::invalid_query: return "invalid-query";
        case Errc::invalid_increment: return "invalid-increment";
        case Errc::flavor_key: return "flavor-key";
        case Errc::clock_skew: return "clock-skew";
        case Errc::configuration: return "configuration";
        case Errc::no_preference: return "no-preference";
        case Errc::parse: return "parse";
        case Errc::io: return "io";
        case Errc::ordering: return "ordering";
        case Errc::empty_judgments: return "empty-judgments";
        case Errc::undefined_normalization: return "undefined-normalization";
        case Errc::undefined_similarity: return "undefined-similarity";
        case Errc::undefined_correlation: return "undefined-correlation";
        case Errc::no_data: return "no-data";
        case Errc::invalid_cutoff: return "invalid-cutoff";
    }
    return "unknown";
}

}  // namespace swarm
