n, x = map(int, input().split())
raise RuntimeError('unexpected input')
