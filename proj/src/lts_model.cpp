/*
 * Copyright 2026 The branchmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <branchmin/lts_model.hpp>

#include <charconv>
#include <numeric>
#include <optional>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace branchmin {

ModelError::ModelError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
      kind_(kind),
      line_(line) {}

namespace {

using Kind = ModelError::Kind;

std::uint64_t edge_key(StateId s, StateId t) {
    return (std::uint64_t{s} << 32) | t;
}

// Splits on '\n', strips a trailing '\r'. Yields (1-based line number, text).
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    bool next(std::string_view& line) {
        if (pos_ > text_.size()) return false;
        if (pos_ == text_.size()) {
            pos_ = text_.size() + 1;
            return false;
        }
        std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        line = text_.substr(pos_, end - pos_);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos_ = end + 1;
        ++line_no_;
        return true;
    }

    std::size_t line_no() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_no_ = 0;
};

std::string_view trim(std::string_view s) {
    const auto* ws = " \t";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::optional<std::uint64_t> to_number(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    if (s.empty()) return std::nullopt;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool is_tau_label(std::string_view label) { return label == "tau" || label == "i"; }

}  // namespace

// --- KripkeStructure -------------------------------------------------------

KripkeStructure::KripkeStructure(std::size_t n_states,
                                 std::vector<std::string> props,
                                 std::vector<std::vector<PropId>> labels,
                                 std::vector<Edge> transitions)
    : n_states_(n_states), transitions_(std::move(transitions)) {
    if (labels.size() != n_states)
        throw ModelError(Kind::Range, 0, "label count does not match state count");

    std::vector<PropId> order(props.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](PropId a, PropId b) { return props[a] < props[b]; });
    std::vector<PropId> remap(props.size());
    props_.reserve(props.size());
    for (PropId i = 0; i < order.size(); ++i) {
        if (i > 0 && props[order[i]] == props[order[i - 1]])
            throw ModelError(Kind::Duplicate, 0, "duplicate proposition '" + props[order[i]] + "'");
        remap[order[i]] = i;
        props_.push_back(std::move(props[order[i]]));
    }

    labels_.resize(n_states);
    for (std::size_t s = 0; s < n_states; ++s) {
        auto& out = labels_[s];
        for (PropId p : labels[s]) {
            if (p >= remap.size())
                throw ModelError(Kind::Range, 0, "proposition id out of range");
            out.push_back(remap[p]);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }

    std::vector<std::uint64_t> keys;
    keys.reserve(transitions_.size());
    std::vector<bool> has_out(n_states, false);
    for (const auto& e : transitions_) {
        if (e.src >= n_states || e.dst >= n_states)
            throw ModelError(Kind::Range, 0,
                             "transition (" + std::to_string(e.src) + "," +
                                 std::to_string(e.dst) + ") out of range");
        keys.push_back(edge_key(e.src, e.dst));
        has_out[e.src] = true;
    }
    std::sort(keys.begin(), keys.end());
    if (auto it = std::adjacent_find(keys.begin(), keys.end()); it != keys.end())
        throw ModelError(Kind::Duplicate, 0,
                         "duplicate transition (" + std::to_string(*it >> 32) + "," +
                             std::to_string(*it & 0xffffffffu) + ")");
    for (std::size_t s = 0; s < n_states; ++s)
        if (!has_out[s])
            throw ModelError(Kind::Totality, 0,
                             "state " + std::to_string(s) + " has no outgoing transition");
}

std::vector<std::string> KripkeStructure::label_names(StateId s) const {
    std::vector<std::string> out;
    for (PropId p : labels_[s]) out.push_back(props_[p]);
    return out;
}

bool KripkeStructure::same_system(const KripkeStructure& other) const {
    if (n_states_ != other.n_states_ || transitions_.size() != other.transitions_.size())
        return false;
    for (StateId s = 0; s < n_states_; ++s)
        if (label_names(s) != other.label_names(s)) return false;
    auto a = transitions_;
    auto b = other.transitions_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

// --- Lts -------------------------------------------------------------------

Lts::Lts(std::size_t n_states,
         StateId initial,
         std::vector<std::string> actions,
         std::vector<LabelledEdge> transitions)
    : n_states_(n_states),
      initial_(initial),
      actions_(std::move(actions)),
      transitions_(std::move(transitions)) {
    if (actions_.empty() || actions_[0] != kTauName)
        throw ModelError(Kind::Parse, 0, "action 0 must be the internal action");
    if (n_states_ > 0 && initial_ >= n_states_)
        throw ModelError(Kind::Range, 0, "initial state out of range");
    {
        auto sorted = actions_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw ModelError(Kind::Duplicate, 0, "duplicate action name");
    }
    std::vector<std::tuple<StateId, ActionId, StateId>> keys;
    keys.reserve(transitions_.size());
    for (const auto& t : transitions_) {
        if (t.src >= n_states_ || t.dst >= n_states_ || t.action >= actions_.size())
            throw ModelError(Kind::Range, 0, "transition out of range");
        keys.emplace_back(t.src, t.action, t.dst);
    }
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
        throw ModelError(Kind::Duplicate, 0, "duplicate transition");
}

bool Lts::same_system(const Lts& other) const {
    if (n_states_ != other.n_states_ || transitions_.size() != other.transitions_.size())
        return false;
    using Named = std::tuple<StateId, std::string, StateId>;
    auto named = [](const Lts& l) {
        std::vector<Named> v;
        for (const auto& t : l.transitions_) v.emplace_back(t.src, l.actions_[t.action], t.dst);
        std::sort(v.begin(), v.end());
        return v;
    };
    return named(*this) == named(other);
}

// --- PartitionMap ----------------------------------------------------------

PartitionMap::PartitionMap(std::vector<StateId> class_of) : class_of_(std::move(class_of)) {
    for (StateId s = 0; s < class_of_.size(); ++s) {
        const StateId r = class_of_[s];
        if (r > s || r >= class_of_.size() || class_of_[r] != r)
            throw std::invalid_argument("PartitionMap: not canonical at state " + std::to_string(s));
    }
}

std::size_t PartitionMap::num_classes() const {
    std::size_t k = 0;
    for (StateId s = 0; s < class_of_.size(); ++s) k += class_of_[s] == s;
    return k;
}

std::vector<std::uint32_t> PartitionMap::class_indices() const {
    std::vector<std::uint32_t> idx(class_of_.size());
    std::uint32_t next = 0;
    for (StateId s = 0; s < class_of_.size(); ++s)
        idx[s] = class_of_[s] == s ? next++ : idx[class_of_[s]];
    return idx;
}

// --- .aut ------------------------------------------------------------------

Lts parse_aut(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    do {
        if (!reader.next(line)) throw ModelError(Kind::Parse, 1, "missing 'des' header");
    } while (trim(line).empty());

    const std::size_t header_line = reader.line_no();
    auto header = trim(line);
    auto bad_header = [&] {
        return ModelError(Kind::Parse, header_line, "malformed header, expected 'des (<init>,<m>,<n>)'");
    };
    if (header.substr(0, 3) != "des") throw bad_header();
    header = trim(header.substr(3));
    if (header.size() < 2 || header.front() != '(' || header.back() != ')') throw bad_header();
    header = header.substr(1, header.size() - 2);
    const auto c1 = header.find(',');
    const auto c2 = header.find(',', c1 == std::string_view::npos ? c1 : c1 + 1);
    if (c1 == std::string_view::npos || c2 == std::string_view::npos) throw bad_header();
    const auto init = to_number(header.substr(0, c1));
    const auto m = to_number(header.substr(c1 + 1, c2 - c1 - 1));
    const auto n = to_number(header.substr(c2 + 1));
    if (!init || !m || !n) throw bad_header();
    if (*n > 0 && *init >= *n)
        throw ModelError(Kind::Range, header_line, "initial state " + std::to_string(*init) + " out of range");

    std::vector<std::string> actions{std::string(Lts::kTauName)};
    std::unordered_map<std::string, ActionId> action_ids;
    std::vector<LabelledEdge> transitions;
    transitions.reserve(*m);
    std::vector<std::tuple<StateId, ActionId, StateId, std::size_t>> keyed;
    keyed.reserve(*m);

    while (reader.next(line)) {
        const auto body = trim(line);
        if (body.empty()) continue;
        const std::size_t ln = reader.line_no();
        auto bad_line = [&] {
            return ModelError(Kind::Parse, ln, "malformed transition, expected '(<src>,<label>,<dst>)'");
        };
        if (body.size() < 2 || body.front() != '(' || body.back() != ')') throw bad_line();
        const auto inner = body.substr(1, body.size() - 2);
        const auto first = inner.find(',');
        const auto last = inner.rfind(',');
        if (first == std::string_view::npos || last == first) throw bad_line();
        const auto src = to_number(inner.substr(0, first));
        const auto dst = to_number(inner.substr(last + 1));
        auto label = trim(inner.substr(first + 1, last - first - 1));
        if (!src || !dst || label.empty()) throw bad_line();
        if (label.front() == '"') {
            if (label.size() < 2 || label.back() != '"') throw bad_line();
            label = label.substr(1, label.size() - 2);
        }
        if (*src >= *n || *dst >= *n)
            throw ModelError(Kind::Range, ln,
                             "state id " + std::to_string(*src >= *n ? *src : *dst) +
                                 " out of range (n=" + std::to_string(*n) + ")");
        if (transitions.size() == *m)
            throw ModelError(Kind::Parse, ln, "more transitions than declared in header");

        ActionId a = Lts::kTau;
        if (!is_tau_label(label)) {
            auto [it, inserted] = action_ids.emplace(std::string(label), static_cast<ActionId>(actions.size()));
            if (inserted) actions.emplace_back(label);
            a = it->second;
        }
        transitions.push_back({static_cast<StateId>(*src), a, static_cast<StateId>(*dst)});
        keyed.emplace_back(transitions.back().src, a, transitions.back().dst, ln);
    }
    if (transitions.size() != *m)
        throw ModelError(Kind::Parse, reader.line_no(),
                         "header declares " + std::to_string(*m) + " transitions, found " +
                             std::to_string(transitions.size()));

    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 1; i < keyed.size(); ++i) {
        const auto& [s0, a0, d0, l0] = keyed[i - 1];
        const auto& [s1, a1, d1, l1] = keyed[i];
        if (s0 == s1 && a0 == a1 && d0 == d1)
            throw ModelError(Kind::Duplicate, std::max(l0, l1), "duplicate transition");
    }
    return Lts(*n, static_cast<StateId>(*init), std::move(actions), std::move(transitions));
}

std::string write_aut(const Lts& lts) {
    std::vector<const LabelledEdge*> order;
    order.reserve(lts.num_transitions());
    for (const auto& t : lts.transitions()) order.push_back(&t);
    std::sort(order.begin(), order.end(), [&](const LabelledEdge* a, const LabelledEdge* b) {
        if (a->src != b->src) return a->src < b->src;
        if (a->action != b->action) {
            const auto& na = lts.action_name(a->action);
            const auto& nb = lts.action_name(b->action);
            if (na != nb) return na < nb;
        }
        return a->dst < b->dst;
    });
    std::ostringstream out;
    out << "des (" << lts.initial_state() << ',' << lts.num_transitions() << ','
        << lts.num_states() << ")\n";
    for (const auto* t : order)
        out << '(' << t->src << ",\"" << lts.action_name(t->action) << "\"," << t->dst << ")\n";
    return out.str();
}

// --- Kripke text format ----------------------------------------------------

KripkeStructure parse_kripke(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    do {
        if (!reader.next(line)) throw ModelError(Kind::Parse, 1, "missing 'kripke' header");
    } while (trim(line).empty());

    const std::size_t header_line = reader.line_no();
    const auto head = split_ws(trim(line));
    std::optional<std::uint64_t> n, m;
    if (head.size() == 3 && head[0] == "kripke") {
        n = to_number(head[1]);
        m = to_number(head[2]);
    }
    if (!n || !m)
        throw ModelError(Kind::Parse, header_line, "malformed header, expected 'kripke <n> <m>'");

    std::vector<std::string> props;
    std::unordered_map<std::string, PropId> prop_ids;
    std::vector<std::vector<PropId>> labels(*n);
    std::vector<bool> labelled(*n, false);
    std::size_t n_labels = 0;
    std::vector<Edge> transitions;
    transitions.reserve(*m);
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;

    while (reader.next(line)) {
        const auto body = trim(line);
        if (body.empty()) continue;
        const std::size_t ln = reader.line_no();
        const auto tok = split_ws(body);
        if (tok.size() == 3 && tok[0] == "label") {
            const auto s = to_number(tok[1]);
            if (!s) throw ModelError(Kind::Parse, ln, "malformed state id");
            if (*s >= *n)
                throw ModelError(Kind::Range, ln, "state id " + std::to_string(*s) + " out of range");
            if (labelled[*s])
                throw ModelError(Kind::Duplicate, ln, "state " + std::to_string(*s) + " labelled twice");
            labelled[*s] = true;
            ++n_labels;
            if (tok[2] == "-") continue;
            std::string_view rest = tok[2];
            while (true) {
                const auto comma = rest.find(',');
                const auto name = rest.substr(0, comma);
                if (name.empty() || name == "-")
                    throw ModelError(Kind::Parse, ln, "malformed proposition list");
                auto [it, inserted] = prop_ids.emplace(std::string(name), static_cast<PropId>(props.size()));
                if (inserted) props.emplace_back(name);
                labels[*s].push_back(it->second);
                if (comma == std::string_view::npos) break;
                rest = rest.substr(comma + 1);
            }
        } else if (tok.size() == 3 && tok[0] == "trans") {
            const auto s = to_number(tok[1]);
            const auto d = to_number(tok[2]);
            if (!s || !d) throw ModelError(Kind::Parse, ln, "malformed transition");
            if (*s >= *n || *d >= *n)
                throw ModelError(Kind::Range, ln,
                                 "state id " + std::to_string(*s >= *n ? *s : *d) + " out of range");
            if (transitions.size() == *m)
                throw ModelError(Kind::Parse, ln, "more transitions than declared in header");
            transitions.push_back({static_cast<StateId>(*s), static_cast<StateId>(*d)});
            keyed.emplace_back(edge_key(transitions.back().src, transitions.back().dst), ln);
        } else {
            throw ModelError(Kind::Parse, ln, "expected 'label <state> <props>' or 'trans <src> <dst>'");
        }
    }
    if (n_labels != *n)
        throw ModelError(Kind::Parse, reader.line_no(),
                         "expected " + std::to_string(*n) + " label lines, found " + std::to_string(n_labels));
    if (transitions.size() != *m)
        throw ModelError(Kind::Parse, reader.line_no(),
                         "header declares " + std::to_string(*m) + " transitions, found " +
                             std::to_string(transitions.size()));
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t i = 1; i < keyed.size(); ++i)
        if (keyed[i].first == keyed[i - 1].first)
            throw ModelError(Kind::Duplicate, std::max(keyed[i].second, keyed[i - 1].second),
                             "duplicate transition");
    return KripkeStructure(*n, std::move(props), std::move(labels), std::move(transitions));
}

std::string write_kripke(const KripkeStructure& k) {
    std::ostringstream out;
    out << "kripke " << k.num_states() << ' ' << k.num_transitions() << '\n';
    for (StateId s = 0; s < k.num_states(); ++s) {
        out << "label " << s << ' ';
        const auto label = k.label(s);
        if (label.empty()) out << '-';
        for (std::size_t i = 0; i < label.size(); ++i) out << (i ? "," : "") << k.props()[label[i]];
        out << '\n';
    }
    auto edges = k.transitions();
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) out << "trans " << e.src << ' ' << e.dst << '\n';
    return out.str();
}

}  // namespace branchmin
