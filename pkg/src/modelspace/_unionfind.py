class UnionFind:
    """Disjoint sets over 0..n-1 whose representative is always the least member."""

    def __init__(self, n=0):
        self.parent = list(range(n))

    def add(self):
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def __len__(self):
        return len(self.parent)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        """Merge the classes of x and y; return True if they were distinct."""
        x, y = self.find(x), self.find(y)
        if x == y:
            return False
        if y < x:
            x, y = y, x
        self.parent[y] = x
        return True

    def classes(self):
        """Representatives in increasing order, and a map element -> class index."""
        reps = sorted({self.find(x) for x in range(len(self.parent))})
        index = {r: i for i, r in enumerate(reps)}
        return reps, [index[self.find(x)] for x in range(len(self.parent))]
