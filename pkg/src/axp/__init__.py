# 溯因解释模块
# 删除式搜索、证书复核与渲染
