from ssmdp_core.types import Catalog, Item, ItemPage, ItemPageHistory


def make_page(ids, features, step=1) -> ItemPage:
    return ItemPage(items=tuple(Item(id=i, features=f) for i, f in zip(ids, features)), step=step)


def history_of(catalog: Catalog, id_pages, query=0) -> ItemPageHistory:
    """A history whose page k shows the given catalog ids."""
    pages = tuple(
        ItemPage(items=tuple(catalog.item(i) for i in ids), step=step)
        for step, ids in enumerate(id_pages, start=1)
    )
    return ItemPageHistory(query=query, pages=pages)
