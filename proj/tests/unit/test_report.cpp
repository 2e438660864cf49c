#include "densitrace/errors.hpp"
#include "densitrace/report.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

using namespace densitrace;

namespace {

TokenDensityRecord rec(int pos, std::string text, double rho) {
    TokenDensityRecord r;
    r.position = pos;
    r.text = std::move(text);
    r.rho_hat = rho;
    return r;
}

std::vector<std::string> token_colors(const std::string& html) {
    static const std::regex span(R"(class="tok" style="background-color: (#[0-9a-f]{6}))");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(html.begin(), html.end(), span); it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1]);
    return out;
}

bool has_python() { return std::system("python3 -c 'import xml.dom.minidom' >/dev/null 2>&1") == 0; }

}  // namespace

TEST(Palette, StopsAndInterpolation) {
    const Palette p = Palette::viridis5();
    EXPECT_EQ(to_hex(p.at(0.0)), "#440154");
    EXPECT_EQ(to_hex(p.at(0.25)), "#3b528b");
    EXPECT_EQ(to_hex(p.at(0.5)), "#21918c");
    EXPECT_EQ(to_hex(p.at(0.75)), "#5ec962");
    EXPECT_EQ(to_hex(p.at(1.0)), "#fde725");
    // Halfway between #21918c and #5ec962.
    EXPECT_EQ(p.at(0.625), (Rgb{0x40, 0xad, 0x77}));
    EXPECT_EQ(p.at(-3.0), p.at(0.0));
    EXPECT_EQ(p.at(7.0), p.at(1.0));
}

TEST(Normalization, MinMaxAndDegenerate) {
    EXPECT_DOUBLE_EQ(normalized_density(0.1, 0.1, 0.9), 0.0);
    EXPECT_DOUBLE_EQ(normalized_density(0.9, 0.1, 0.9), 1.0);
    EXPECT_DOUBLE_EQ(normalized_density(0.5, 0.1, 0.9), 0.5);
    EXPECT_DOUBLE_EQ(normalized_density(0.3, 0.3, 0.3), 0.5);
}

TEST(HtmlReport, EqualDensitiesRenderAtMidpoint) {
    const auto html = render_html_report({rec(0, "a", 0.4), rec(1, " b", 0.4), rec(2, " c", 0.4)});
    const auto colors = token_colors(html);
    ASSERT_EQ(colors.size(), 3u);
    for (const auto& c : colors) EXPECT_EQ(c, "#21918c");
}

TEST(HtmlReport, ExtremesMapToPaletteEnds) {
    const auto html = render_html_report({rec(0, "lo", 0.1), rec(1, "hi", 0.9)});
    EXPECT_EQ(token_colors(html), (std::vector<std::string>{"#440154", "#fde725"}));
    EXPECT_NE(html.find("title=\"rho_hat=0.1 pos=0\""), std::string::npos);
    EXPECT_NE(html.find("title=\"rho_hat=0.9 pos=1\""), std::string::npos);
    EXPECT_NE(html.find("class=\"legend\""), std::string::npos);
}

TEST(HtmlReport, EscapesAndSanitizes) {
    const auto html = render_html_report({rec(0, "<b>&\"'", 0.2), rec(1, "\xE2\x80", 0.3), rec(2, "\x01", 0.5)});
    EXPECT_NE(html.find("&lt;b&gt;&amp;&quot;&#39;"), std::string::npos);
    EXPECT_EQ(html.find("<b>"), std::string::npos);
    EXPECT_EQ(html.find('\x01'), std::string::npos);
    EXPECT_NE(html.find("\xEF\xBF\xBD"), std::string::npos);
}

TEST(HtmlReport, EmptyRecordsRejected) { EXPECT_THROW(render_html_report({}), Error); }

TEST(HtmlReport, WellFormedUnderXmlParser) {
    if (!has_python()) GTEST_SKIP() << "python3 not available";
    densitrace::testing::TempDir dir("html");
    ReportOptions o;
    o.title = "T <&> \"x\"";
    o.prefix_text = "prompt & <context>\n";
    const auto html = render_html_report(
        {rec(0, "a\n", 0.1), rec(1, " <tag>", 0.5), rec(2, "\xF0\x9F", 0.9), rec(3, "\xFF", 0.2), rec(4, "\t&", 0.3)}, o);
    densitrace::testing::write_text(dir / "r.html", html);
    const std::string cmd = "python3 -c \"import sys, xml.dom.minidom as m; m.parse(sys.argv[1])\" '" +
                            (dir / "r.html").string() + "'";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
}
