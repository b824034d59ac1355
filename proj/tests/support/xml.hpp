#ifndef ATTN_TESTS_XML_HPP
#define ATTN_TESTS_XML_HPP

#include <expat.h>

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace attn::testing {

struct XmlNode {
    std::string name;
    std::map<std::string, std::string> attrs;
    std::string text;
    std::vector<std::unique_ptr<XmlNode>> children;

    std::string attr(const std::string& key) const {
        const auto it = attrs.find(key);
        return it == attrs.end() ? std::string{} : it->second;
    }
    bool has(const std::string& key) const { return attrs.count(key) > 0; }

    // Pre-order search over this node and its descendants.
    void visit(const std::function<void(const XmlNode&)>& fn) const {
        fn(*this);
        for (const auto& c : children) c->visit(fn);
    }
    std::vector<const XmlNode*> find_all(const std::function<bool(const XmlNode&)>& pred) const {
        std::vector<const XmlNode*> out;
        visit([&](const XmlNode& n) {
            if (pred(n)) out.push_back(&n);
        });
        return out;
    }
    std::vector<const XmlNode*> by_class(const std::string& cls) const {
        return find_all([&](const XmlNode& n) { return n.attr("class") == cls; });
    }
    std::vector<const XmlNode*> by_id_prefix(const std::string& prefix) const {
        return find_all([&](const XmlNode& n) { return n.attr("id").rfind(prefix, 0) == 0; });
    }
    const XmlNode* by_id(const std::string& id) const {
        const auto all = find_all([&](const XmlNode& n) { return n.attr("id") == id; });
        return all.empty() ? nullptr : all.front();
    }
};

// Parses a document with expat; throws std::runtime_error when it is not well-formed.
inline std::unique_ptr<XmlNode> parse_xml(const std::string& text) {
    struct State {
        std::unique_ptr<XmlNode> root;
        std::vector<XmlNode*> stack;
    } state;
    XML_Parser parser = XML_ParserCreate("UTF-8");
    XML_SetUserData(parser, &state);
    XML_SetElementHandler(
        parser,
        [](void* data, const XML_Char* name, const XML_Char** atts) {
            auto& s = *static_cast<State*>(data);
            auto node = std::make_unique<XmlNode>();
            node->name = name;
            for (int i = 0; atts[i]; i += 2) node->attrs[atts[i]] = atts[i + 1];
            XmlNode* raw = node.get();
            if (s.stack.empty()) s.root = std::move(node);
            else s.stack.back()->children.push_back(std::move(node));
            s.stack.push_back(raw);
        },
        [](void* data, const XML_Char*) { static_cast<State*>(data)->stack.pop_back(); });
    XML_SetCharacterDataHandler(parser, [](void* data, const XML_Char* s, int len) {
        auto& st = *static_cast<State*>(data);
        if (!st.stack.empty()) st.stack.back()->text.append(s, static_cast<std::size_t>(len));
    });
    const bool ok = XML_Parse(parser, text.data(), static_cast<int>(text.size()), 1) != XML_STATUS_ERROR;
    std::string message = ok ? "" : XML_ErrorString(XML_GetErrorCode(parser));
    const auto line = XML_GetCurrentLineNumber(parser);
    XML_ParserFree(parser);
    if (!ok) throw std::runtime_error("malformed XML at line " + std::to_string(line) + ": " + message);
    return std::move(state.root);
}

} // namespace attn::testing

#endif
