#include "shardagg/store/object_key.hpp"

#include <array>
#include <charconv>
#include <vector>

#include <fmt/format.h>

#include "shardagg/errors.hpp"

namespace shardagg::store {

namespace {

constexpr std::array<std::pair<KeyRole, std::string_view>, 7> kRoleNames{{
    {KeyRole::ClientGradient, "client_gradient"},
    {KeyRole::ClientShard, "client_shard"},
    {KeyRole::LeafPartial, "leaf_partial"},
    {KeyRole::Level1Partial, "level1_partial"},
    {KeyRole::Level2Partial, "level2_partial"},
    {KeyRole::RootResult, "root_result"},
    {KeyRole::ShardResult, "shard_result"},
}};

bool is_partial(KeyRole r) {
    return r == KeyRole::LeafPartial || r == KeyRole::Level1Partial || r == KeyRole::Level2Partial;
}

bool is_client(KeyRole r) { return r == KeyRole::ClientGradient || r == KeyRole::ClientShard; }

bool is_shard(KeyRole r) { return r == KeyRole::ClientShard || r == KeyRole::ShardResult; }

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

// "<prefix><digits>" -> digits as int.
std::optional<int> parse_tagged(std::string_view token, char prefix) {
    if (token.size() < 2 || token.front() != prefix) return std::nullopt;
    int value = 0;
    const auto* first = token.data() + 1;
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return value;
}

}  // namespace

std::string_view to_string(KeyRole role) {
    for (const auto& [r, name] : kRoleNames) {
        if (r == role) return name;
    }
    return "unknown";
}

std::optional<KeyRole> parse_role(std::string_view s) {
    for (const auto& [r, name] : kRoleNames) {
        if (name == s) return r;
    }
    return std::nullopt;
}

ObjectKey ObjectKey::client_gradient(int round, int client) {
    return {round, KeyRole::ClientGradient, client, std::nullopt, std::nullopt};
}

ObjectKey ObjectKey::client_shard(int round, int client, int shard) {
    return {round, KeyRole::ClientShard, client, shard, std::nullopt};
}

ObjectKey ObjectKey::shard_result(int round, int shard) {
    return {round, KeyRole::ShardResult, std::nullopt, shard, std::nullopt};
}

ObjectKey ObjectKey::partial(int round, KeyRole role, int index) {
    ObjectKey k{round, role, std::nullopt, std::nullopt, index};
    k.validate();
    return k;
}

ObjectKey ObjectKey::root_result(int round) {
    return {round, KeyRole::RootResult, std::nullopt, std::nullopt, std::nullopt};
}

void ObjectKey::validate() const {
    auto fail = [&](const char* why) {
        throw InvalidArgument(fmt::format("malformed {} key: {}", to_string(role), why));
    };
    if (round < 0) fail("negative round");
    if (is_client(role) != client_id.has_value()) fail("client_id presence");
    if (is_shard(role) != shard_index.has_value()) fail("shard_index presence");
    if (is_partial(role) != level_index.has_value()) fail("level_index presence");
    if ((client_id && *client_id < 0) || (shard_index && *shard_index < 0) ||
        (level_index && *level_index < 0)) {
        fail("negative index");
    }
}

std::string ObjectKey::path() const {
    validate();
    std::string out = fmt::format("r{}/{}", round, to_string(role));
    if (client_id) out += fmt::format("/c{:02d}", *client_id);
    if (shard_index) out += fmt::format("/s{}", *shard_index);
    if (level_index) out += fmt::format("/l{}", *level_index);
    return out;
}

ObjectKey ObjectKey::parse(std::string_view path) {
    auto bad = [&]() -> InvalidArgument {
        return InvalidArgument(fmt::format("not a canonical object key: '{}'", path));
    };
    const auto parts = split(path, '/');
    if (parts.size() < 2) throw bad();
    const auto round = parse_tagged(parts[0], 'r');
    const auto role = parse_role(parts[1]);
    if (!round || !role) throw bad();

    ObjectKey key{*round, *role, std::nullopt, std::nullopt, std::nullopt};
    std::size_t next = 2;
    auto take = [&](char tag) -> int {
        if (next >= parts.size()) throw bad();
        const auto v = parse_tagged(parts[next++], tag);
        if (!v) throw bad();
        return *v;
    };
    if (is_client(*role)) key.client_id = take('c');
    if (is_shard(*role)) key.shard_index = take('s');
    if (is_partial(*role)) key.level_index = take('l');
    if (next != parts.size()) throw bad();
    try {
        if (key.path() != path) throw bad();
    } catch (const InvalidArgument&) {
        throw bad();
    }
    return key;
}

std::optional<int> ObjectKey::member_index() const {
    if (client_id) return client_id;
    if (level_index) return level_index;
    if (shard_index) return shard_index;
    return std::nullopt;
}

bool KeyPattern::matches(const ObjectKey& key) const {
    if (key.round != round || key.role != role) return false;
    if (shard_index && key.shard_index != shard_index) return false;
    if (members) {
        const auto idx = key.member_index();
        if (!idx || !members->contains(*idx)) return false;
    }
    return true;
}

std::string KeyPattern::to_string() const {
    std::string out = fmt::format("r{}/{}", round, store::to_string(role));
    if (members) out += fmt::format("/[{},{})", members->begin, members->end);
    if (shard_index) out += fmt::format("/s{}", *shard_index);
    return out;
}

}  // namespace shardagg::store
