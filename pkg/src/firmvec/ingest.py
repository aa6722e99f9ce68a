"""Webpage ingestion: fetching, visible-text extraction, alt tags, image labels.

Fetch failures are data, not exceptions: a failed fetch yields HTTP status 0
and an empty body so batch runs keep going. Images are never touched here;
image class labels arrive through an external labels file keyed by record id.
"""

from __future__ import annotations

import logging
import urllib.robotparser
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urljoin, urlparse

import requests

from .errors import ParseError

log = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 10.0
DEFAULT_USER_AGENT = "firmvec/0.1"
MAX_REDIRECTS = 5


@dataclass(frozen=True)
class PageFetchResult:
    url: str
    http_status: int  # 0 means the fetch itself failed
    raw_html: str


@dataclass
class RawChannels:
    """Raw per-channel strings for one company page."""

    text: str = ""
    alt: str = ""
    image_labels: list[str] = field(default_factory=list)


def fetch_page(
    url: str,
    timeout: float = DEFAULT_TIMEOUT,
    user_agent: str = DEFAULT_USER_AGENT,
    max_redirects: int = MAX_REDIRECTS,
) -> PageFetchResult:
    """GET a page; non-200 statuses are returned, never raised."""
    session = requests.Session()
    session.max_redirects = max_redirects
    try:
        response = session.get(
            url,
            timeout=timeout,
            headers={"User-Agent": user_agent},
            allow_redirects=True,
        )
        return PageFetchResult(url=url, http_status=response.status_code, raw_html=response.text)
    except requests.RequestException as exc:
        log.debug("fetch failed for %s: %s", url, exc)
        return PageFetchResult(url=url, http_status=0, raw_html="")
    finally:
        session.close()


def robots_allows(url: str, timeout: float = DEFAULT_TIMEOUT, user_agent: str = DEFAULT_USER_AGENT) -> bool:
    """Check robots.txt for the URL; unreachable robots.txt means allowed."""
    parsed = urlparse(url)
    robots_url = urljoin(f"{parsed.scheme}://{parsed.netloc}", "/robots.txt")
    result = fetch_page(robots_url, timeout=timeout, user_agent=user_agent)
    if result.http_status != 200:
        return True
    parser = urllib.robotparser.RobotFileParser()
    parser.parse(result.raw_html.splitlines())
    return parser.can_fetch(user_agent, url)


_EXCLUDED_CONTAINERS = {"script", "style", "noscript"}


class _VisibleTextParser(HTMLParser):
    """Collects text nodes outside script/style/noscript/comments and <head>."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.words: list[str] = []
        self._skip_depth = 0
        self._head_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _EXCLUDED_CONTAINERS:
            self._skip_depth += 1
        elif tag == "head":
            self._head_depth += 1

    def handle_endtag(self, tag):
        if tag in _EXCLUDED_CONTAINERS and self._skip_depth > 0:
            self._skip_depth -= 1
        elif tag == "head" and self._head_depth > 0:
            self._head_depth -= 1

    def handle_data(self, data):
        if self._skip_depth == 0 and self._head_depth == 0:
            self.words.extend(data.split())


def extract_visible_text(html: str) -> str:
    """All visible text nodes joined with single spaces; best-effort on junk."""
    parser = _VisibleTextParser()
    try:
        parser.feed(html)
        parser.close()
    except Exception:  # html.parser rarely throws, but malformed input must not
        pass
    return " ".join(parser.words)


class _AltTagParser(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.alts: list[str] = []

    def _collect(self, tag, attrs):
        if tag == "img":
            for name, value in attrs:
                if name == "alt" and value:
                    self.alts.append(value)
                    break

    def handle_starttag(self, tag, attrs):
        self._collect(tag, attrs)

    def handle_startendtag(self, tag, attrs):
        self._collect(tag, attrs)


def extract_alt_tags(html: str) -> list[str]:
    """Non-empty alt attributes of img elements, in document order."""
    parser = _AltTagParser()
    try:
        parser.feed(html)
        parser.close()
    except Exception:
        pass
    return parser.alts


def scrape_page(
    url: str,
    timeout: float = DEFAULT_TIMEOUT,
    user_agent: str = DEFAULT_USER_AGENT,
) -> tuple[PageFetchResult, RawChannels]:
    """Fetch one page and split it into raw text/alt channels."""
    result = fetch_page(url, timeout=timeout, user_agent=user_agent)
    if result.http_status != 200 or not result.raw_html:
        return result, RawChannels()
    channels = RawChannels(
        text=extract_visible_text(result.raw_html),
        alt=" ".join(extract_alt_tags(result.raw_html)),
    )
    return result, channels


def read_url_list(path: str | Path) -> list[str]:
    """One URL per line; blank lines and `#` comment lines are skipped."""
    urls = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            urls.append(line)
    return urls


def read_image_labels(path: str | Path) -> dict[str, list[str]]:
    """Parse `record_id<TAB>label1;label2;label3` lines; last id wins."""
    path = Path(path)
    try:
        content = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read labels file {path}: {exc}") from exc
    labels: dict[str, list[str]] = {}
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected `id<TAB>labels`")
        record_id, joined = parts
        if not record_id:
            raise ParseError(f"{path}:{lineno}: empty record id")
        labels[record_id] = [lab for lab in joined.split(";") if lab]
    return labels


def attach_image_labels(record_id: str, labels_file: str | Path) -> list[str]:
    """Labels for one record id; absent ids yield an empty list."""
    return read_image_labels(labels_file).get(record_id, [])
